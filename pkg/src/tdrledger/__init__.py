"""Permissioned registry for transferable development rights.

Land acquisition notices, citizen applications, a multi-department
verification pipeline, and development-rights certificates as unique
tokens, all committed to a hash-chained block log finalized by a fixed
validator set.
"""

__version__ = "0.1.0"
