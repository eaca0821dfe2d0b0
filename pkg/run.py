#!/usr/bin/env python3
"""
qosc - Startup Script
Run this script to use the command-line interface, e.g.
    python run.py simulate --q 0.9 --alpha 1
"""

import os
import sys

if __name__ == "__main__":
    # Add the project root to the Python path
    sys.path.append(os.path.dirname(os.path.abspath(__file__)))

    from src.main import main

    # Run the main function
    sys.exit(main())
