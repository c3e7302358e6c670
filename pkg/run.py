"""
Launch script for the Bergman projection norm toolkit
"""
import sys

from main import main

if __name__ == "__main__":
    sys.exit(main())
