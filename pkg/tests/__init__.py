# Irregularity Profiler - Tests Package
# Estrutura de testes: unitários, propriedades, funcionais, contratos,
# integração e orçamento de tempo

__version__ = "1.0.0"
__author__ = "QA Engineering Team"
__description__ = "Test suite for the irregularity profiler"
