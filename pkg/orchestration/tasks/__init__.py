# Orchestration tasks - @task-decorated wrappers around the verification checks
