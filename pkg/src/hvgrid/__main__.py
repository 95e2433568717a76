import sys

from hvgrid.cli import main

sys.exit(main())
