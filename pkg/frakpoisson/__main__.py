# pylint: disable=missing-docstring
import sys

from .cli import main


sys.exit(main())
