#!/usr/bin/env python3
"""
极限球 Cauchy 变换工具统一启动入口

示例:
  # 根格分类
  python start_cli.py lattice fixtures/sl2.rd --enumerate 5

  # Cauchy 变换
  python start_cli.py transform --w 2z0 --lambda 2 --zeta 2z0bar

  # 反演流水线
  python start_cli.py invert --w 2z0 --lambda 2 --s 0.3,0.6,0.9,1.2,1.5

  # 验证组
  python start_cli.py verify all --seed 20240601 --format csv --out results.csv
"""

import os
import sys

# 添加项目根目录到Python路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.interfaces.cli import cli


def main():
    cli(prog_name="horocauchy")


if __name__ == "__main__":
    main()
