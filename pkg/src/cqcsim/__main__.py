import sys

from cqcsim.cli import main

sys.exit(main())
