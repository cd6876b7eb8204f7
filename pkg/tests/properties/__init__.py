# Property-Based Tests Package
