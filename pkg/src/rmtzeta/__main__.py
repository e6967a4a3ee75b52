import sys

from rmtzeta.cli import main

sys.exit(main())
