"""Certified reverse triangle inequality bounds."""
