# Services 패키지: 학습 / 평가 / 체크포인트 / 탐색 엔진
