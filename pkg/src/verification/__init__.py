# Named checks and the graph battery they run over
