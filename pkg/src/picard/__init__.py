# Picard - successive approximation with mollified data
