# Graph representation, generators and file I/O
