# Services package for capillary surface verification
