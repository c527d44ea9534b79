# Pacote utils
