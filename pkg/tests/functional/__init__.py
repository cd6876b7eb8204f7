# Functional (CLI) Tests Package
