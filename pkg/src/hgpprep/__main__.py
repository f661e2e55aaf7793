import sys

from hgpprep.cli import main

sys.exit(main())
