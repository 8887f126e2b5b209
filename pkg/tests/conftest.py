import os
import sys

# harness.py and oracle.py live next to the tests
sys.path.insert(0, os.path.dirname(__file__))
