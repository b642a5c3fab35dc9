import sys

from surfseg.cli_root import main

sys.exit(main())
