# ghype utilities - logging, numerical kernels, file formats
