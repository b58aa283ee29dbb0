"""
GraphEcho entry point.

    python app.py gen --complete 4 --lmin 0.155 --total 1.494 --seed 7 -o k4.graph
    python app.py analyze --graph k4.graph --count 106 -o k4_report.json
"""

from modules.cli import main

if __name__ == "__main__":
    main()
