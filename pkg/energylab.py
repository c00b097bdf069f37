#!/usr/bin/env python3
"""energylab - 有限集合の加法・乗法エネルギーと和積分解の厳密計算ツール"""

import sys
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.cli import run


if __name__ == "__main__":
    sys.exit(run())
