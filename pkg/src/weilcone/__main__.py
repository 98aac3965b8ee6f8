import sys

from weilcone.cli import main

sys.exit(main())
