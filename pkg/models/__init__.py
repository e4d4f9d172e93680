# Models package for capillary surface verification
