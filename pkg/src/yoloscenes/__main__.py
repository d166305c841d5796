"""Allow `python -m yoloscenes`."""
from .cli import main

raise SystemExit(main())
