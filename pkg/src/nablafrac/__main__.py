import sys

from nablafrac.cli import main

sys.exit(main())
