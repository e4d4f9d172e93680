# Utils package for capillary surface verification
