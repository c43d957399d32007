import sys

from modelsum.cli import main

sys.exit(main())
