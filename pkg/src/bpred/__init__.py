# This file marks the bpred directory as a Python package
