# ghype models - graph core, soft configuration model, Wallenius ensemble, oracles
