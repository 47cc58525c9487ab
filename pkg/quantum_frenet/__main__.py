"""
quantum_frenet - Package entry point for 'python -m quantum_frenet'.
"""

from .cli import main

if __name__ == "__main__":
    main()
