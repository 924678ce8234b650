"""Test suite for GuideForge."""
