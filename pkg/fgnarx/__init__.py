"""fgnarx - drift estimation and optimal input design for ARX(1) models driven by stationary Gaussian noise"""

__version__ = '0.1.0'
