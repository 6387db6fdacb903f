import sys

from irrcnn.cli.main import main

sys.exit(main())
