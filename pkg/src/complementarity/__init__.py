"""Loss-level model of human-algorithm collaboration."""
