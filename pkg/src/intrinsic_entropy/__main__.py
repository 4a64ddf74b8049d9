import sys

from intrinsic_entropy.cli import main

sys.exit(main())
