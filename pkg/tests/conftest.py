import sys
from pathlib import Path

# make tests/oracle.py importable as plain `oracle` regardless of cwd
sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"
