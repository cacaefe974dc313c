"""Reproduce the digit-change ratio scan and write CSV plus SVG.

Run: python3 demos/scan_figure.py [y_hi]
"""
import sys

from dyadcantor import cli

y_hi = sys.argv[1] if len(sys.argv) > 1 else "1000000"
code = cli.run(["scan-ratio", "--y-lo", "2", "--y-hi", y_hi, "--format", "csv,svg", "--out", "scan_ratio"])
print("wrote scan_ratio.csv, scan_ratio.svg and scan_ratio.meta.json" if code == 0 else f"exit {code}")
