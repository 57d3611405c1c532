# Worker-process execution and result serialization
