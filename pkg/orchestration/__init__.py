# Orchestration package - Prefect flow running the ghype verification suite
