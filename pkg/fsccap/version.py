"""Version of package."""

version = "0.1.0"
