import sys

from flatflow.cli import main

sys.exit(main())
