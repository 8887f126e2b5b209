"""Decide real arithmetic with exp and sin by refining a linear abstraction."""
