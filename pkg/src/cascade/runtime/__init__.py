"""Miniature object VM: heap, GC, dispatch, activation, reflective baseline."""
