# packaging/run_lattes_heights.py
"""Wrapper entry point for PyInstaller builds.

Puts app/ on sys.path (also inside a bundle's _MEIPASS) and hands the
command line to main.main().
"""
import sys
from pathlib import Path

BASE_DIR = Path(getattr(sys, '_MEIPASS', Path(__file__).resolve().parent.parent))
APP_DIR = BASE_DIR / 'app'
if str(APP_DIR) not in sys.path:
    sys.path.insert(0, str(APP_DIR))

from main import main as app_main  # type: ignore

if __name__ == '__main__':
    sys.exit(app_main())
