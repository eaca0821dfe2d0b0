"""
qosc - q-deformed oscillator dynamics and chaos diagnostics
"""

__version__ = '0.1.0'
