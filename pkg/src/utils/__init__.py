"""Configuration, logging, error handling and validation utilities."""
