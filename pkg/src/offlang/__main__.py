from offlang.cli import main
import sys

sys.exit(main())
