import sys
from pathlib import Path

# allow `from fd import ...` style imports of test helpers
sys.path.insert(0, str(Path(__file__).parent))
