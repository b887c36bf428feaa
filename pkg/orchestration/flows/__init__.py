# Orchestration flows - @flow-decorated verification run
