# This file marks the monitoring directory as a Python package
