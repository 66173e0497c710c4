# pylint: disable=missing-docstring, wrong-import-position
import sys
import os

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))
from frakpoisson.cli import main


if __name__ == '__main__':
    sys.exit(main())
