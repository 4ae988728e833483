# CLI command families live here; each module exposes register(subparsers).
