"""Shared test data: task factories, scripted replies and golden prompts."""
