"""Allow ``python -m ogica`` to behave like the ``ogica`` script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
