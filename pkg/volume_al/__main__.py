import sys

from volume_al.cli import main

sys.exit(main())
