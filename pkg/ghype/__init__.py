# ghype package - generalised hypergeometric ensembles of random multigraphs
