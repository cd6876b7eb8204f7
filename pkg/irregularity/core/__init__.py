# Irregularity Profiler - Core
# Configuração, logging estruturado e hierarquia de erros compartilhados
