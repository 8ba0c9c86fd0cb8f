"""effgcn test suite."""
