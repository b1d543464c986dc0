"""Simulator and metrics for collaborative location obfuscation (H-LPS).

A group of peers blurs and shares its positions, elects the member with the
weakest privacy requirement to query the LBS provider with the group mean,
and shares the answer. The package measures what that buys: entropy of the
adversary's view, coverage of each user's area of interest, message
overhead and radio energy.
"""

__version__ = "0.1.0"
