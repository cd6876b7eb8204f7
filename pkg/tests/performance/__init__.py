# Performance Budget Tests Package
