# pylint: disable=missing-docstring
import sys

sys.path.append('.')
