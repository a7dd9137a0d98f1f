"""WAV and report file I/O."""
