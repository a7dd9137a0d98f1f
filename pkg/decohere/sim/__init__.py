"""Echo-path simulation and adaptive echo cancellation."""
