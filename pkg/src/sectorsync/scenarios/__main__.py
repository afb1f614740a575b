"""Print the bundled scenario directory and the available names."""
from . import _root, available

if __name__ == "__main__":
    print(_root())
    for name in available():
        print(f"  {name}")
