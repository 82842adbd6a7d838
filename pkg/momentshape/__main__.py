import sys

from momentshape.cli import main

if __name__ == "__main__":
    sys.exit(main())
