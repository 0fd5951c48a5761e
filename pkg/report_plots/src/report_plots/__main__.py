import sys

from report_plots.cli import main

sys.exit(main())
