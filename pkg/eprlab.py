import sys

from commands.main import run
from settings import settings

if __name__ == "__main__":
    sys.exit(run(sys.argv[1:], settings))
