import sys

from depdisplace.cli import main

sys.exit(main())
