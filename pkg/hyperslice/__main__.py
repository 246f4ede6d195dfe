import sys

from hyperslice.cli import main

sys.exit(main())
