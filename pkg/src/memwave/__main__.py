import sys

from memwave.cli import main

sys.exit(main())
