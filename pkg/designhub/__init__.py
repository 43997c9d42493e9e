"""
designhub - adaptive protein-design pipeline orchestration on a pilot-style scheduler
"""

__version__ = "0.1.0"
