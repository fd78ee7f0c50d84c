# -*- coding: utf-8 -*-
"""Allow ``python -m hybridfv``."""

import sys

from .cli import main


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
