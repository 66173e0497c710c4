"""
Fractional Poisson measures at desk scale: Mittag-Leffler numerics, the
stable mixture representation, window samplers, and an exact discrete
configuration-space algebra.
"""
import pandas as pd

__version__ = '0.3.0'

pd.set_option('display.max_columns', 500)
pd.set_option('display.width', 1000)
