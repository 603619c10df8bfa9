import sys

from cluspr.cli import main

sys.exit(main())
