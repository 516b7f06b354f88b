"""tm-netdoc - executable thinging-machine models of computer networks"""

__version__ = "0.1.0"
