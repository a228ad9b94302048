import sys

from holocurve.cli import main

sys.exit(main())
