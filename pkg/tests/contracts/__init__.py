# Contract Tests Package
